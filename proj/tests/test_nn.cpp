#include <doctest.h>

#include "mge/nn.hpp"
