#include "lingauss_cli/commands.hpp"

int main(int argc, char** argv) { return lingauss::cli::run(argc, argv); }
