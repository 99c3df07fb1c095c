#include "cdlmg/cli.hpp"

int main(int argc, char** argv) { return cdlmg::cli::run(argc, argv); }
