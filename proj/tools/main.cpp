#include "grok/cli.hpp"

int main(int argc, char** argv) { return grok::cli::run_cli(argc, argv); }
