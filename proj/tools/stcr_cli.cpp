#include "stcr/cli.hpp"

int main(int argc, char** argv) { return stcr::cli_main(argc, argv); }
