#include "qdimer/cli.hpp"

int main(int argc, char** argv) { return qdimer::run_cli(argc, argv); }
