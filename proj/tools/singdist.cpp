#include "singdist/cli.hpp"

int main(int argc, char** argv) { return singdist::cli::run(argc, argv); }
