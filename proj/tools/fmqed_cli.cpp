#include "fmqed/cli.hpp"

int main(int argc, char** argv) { return fmqed::run_cli(argc, argv); }
