#include <lhn/cli.hpp>

int main(int argc, char** argv) { return lhn::cli::main(argc, argv); }
