#include "ascsense_cli/cli.hpp"

int main(int argc, char** argv) { return ascsense::cli::parse_and_dispatch(argc, argv); }
