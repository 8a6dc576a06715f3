#include "semgan/cli.hpp"

int main(int argc, char** argv) { return semgan::run_cli(argc, argv); }
