#include "msplit/cli.hpp"

int main(int argc, char** argv) { return msplit::cli_main(argc, argv); }
