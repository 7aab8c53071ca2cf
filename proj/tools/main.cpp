#include "fou/cli.hpp"

int main(int argc, char** argv) { return fou::cli::run(argc, argv); }
