#include <shiftbench/cli.hpp>

int main(int argc, char** argv) { return shiftbench::run_cli(argc, argv); }
