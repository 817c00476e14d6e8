#include "cli.hpp"

int main(int argc, char** argv) { return conespec::cli::run(argc, argv); }
