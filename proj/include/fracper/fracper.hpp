#pragma once

#include "covers.hpp"
#include "errors.hpp"
#include "functionals.hpp"
#include "generators.hpp"
#include "inequality.hpp"
#include "ksum.hpp"
#include "parallel.hpp"
#include "point_set.hpp"
#include "space.hpp"
#include "space_io.hpp"
#include "sweep.hpp"
