#include "elicit/cli.hpp"

int main(int argc, char** argv) { return elicit::cli::run(argc, argv); }
