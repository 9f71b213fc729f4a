#include <doctest.h>

#include "mge/fusion.hpp"
