#include "earda/cli.hpp"

int main(int argc, char** argv) { return earda::cli::run(argc, argv); }
