#include <catch2/catch_amalgamated.hpp>
#include "movierec/movierec.hpp"
