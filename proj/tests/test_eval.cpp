#include <doctest.h>

#include "mge/eval.hpp"
