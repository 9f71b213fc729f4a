#include <doctest.h>

#include "mge/classifiers.hpp"
