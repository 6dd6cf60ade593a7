#include "rationeval/cli.hpp"

int main(int argc, char** argv) { return rationeval::cli::run_cli(argc, argv); }
