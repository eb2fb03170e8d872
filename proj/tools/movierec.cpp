#include "movierec/cli.hpp"

int main(int argc, char** argv) { return movierec::cli::run(argc, argv); }
