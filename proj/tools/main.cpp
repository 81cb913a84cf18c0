#include "sepmin/cli.hpp"

int main(int argc, char** argv) { return sepmin::run_cli(argc, argv); }
