#include <doctest.h>

#include "mge/dataset.hpp"
