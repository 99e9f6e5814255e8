#pragma once

#include "vortex/specfun/angular.hpp"
#include "vortex/specfun/bessel.hpp"
#include "vortex/specfun/factorial.hpp"
#include "vortex/specfun/laguerre.hpp"
#include "vortex/specfun/quadrature.hpp"
