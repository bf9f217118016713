#include "lorentz_compare/cli.hpp"

int main(int argc, char** argv) { return lorentz_compare::cli::run(argc, argv); }
