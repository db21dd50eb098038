#include "chitf/cli/commands.hpp"

int main(int argc, char** argv) { return chitf::cli::run(argc, argv); }
