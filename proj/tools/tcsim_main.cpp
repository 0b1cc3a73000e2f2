#include "tcsim/cli.hpp"

int main(int argc, char** argv) { return tcsim::cli::run_main(argc, argv); }
