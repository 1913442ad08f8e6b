#include "gmvshrink_cli/commands.hpp"

int main(int argc, char** argv) { return gmvshrink::cli::run(argc, argv); }
