#include "sdof/cli.hpp"

int main(int argc, char** argv) { return sdof::cli::run(argc, argv); }
