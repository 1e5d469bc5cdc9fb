#include "tmonad/cli.hpp"

int main(int argc, char** argv) { return tmonad::run_cli(argc, argv); }
