#include "cli.hpp"

int main(int argc, char** argv) { return gamma2::cli::run(argc, argv); }
