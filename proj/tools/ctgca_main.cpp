#include "ctgca/cli.hpp"

int main(int argc, char** argv) { return ctgca::cli::dispatch(argc, argv); }
