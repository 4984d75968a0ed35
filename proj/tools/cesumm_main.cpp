#include "cesumm/cli.hpp"

int main(int argc, char** argv) { return cesumm::cli::dispatch(argc, argv); }
