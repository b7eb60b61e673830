// Umbrella header for the whole library.
#pragma once

#include "gamma.hpp"
#include "model.hpp"
#include "pcf.hpp"
#include "poles.hpp"
#include "scaled.hpp"
#include "starkfield.hpp"
#include "zerofield.hpp"
