#include <catch2/catch_amalgamated.hpp>
#include "pctrank/pctrank.hpp"
