#pragma once

#include "robustmax/curve.hpp"
#include "robustmax/diagram.hpp"
#include "robustmax/improve.hpp"
#include "robustmax/instance.hpp"
#include "robustmax/payoff.hpp"
#include "robustmax/quantile.hpp"
#include "robustmax/simplex.hpp"
#include "robustmax/solve.hpp"
#include "robustmax/space.hpp"
