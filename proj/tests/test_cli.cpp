#include <catch2/catch_amalgamated.hpp>
#include "movierec/cli.hpp"
