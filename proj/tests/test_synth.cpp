#include <doctest.h>

#include "mge/synth.hpp"
