#include "zetalab/cli/app.hpp"

int main(int argc, char** argv) { return zetalab::cli::main(argc, argv); }
