#include <doctest.h>

#include "mge/mimic.hpp"
