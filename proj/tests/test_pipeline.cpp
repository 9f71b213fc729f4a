#include <doctest.h>

#include "mge/pipeline.hpp"
