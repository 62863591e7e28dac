#include "mgfbm/cli.hpp"

int main(int argc, char** argv) { return mgfbm::cli::run(argc, argv); }
