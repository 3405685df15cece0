#pragma once

// Umbrella header.

#include "twsolve/catalog.hpp"
#include "twsolve/errors.hpp"
#include "twsolve/expseries.hpp"
#include "twsolve/homoclinic.hpp"
#include "twsolve/integrate.hpp"
#include "twsolve/io.hpp"
#include "twsolve/model.hpp"
#include "twsolve/rng.hpp"
#include "twsolve/version.hpp"
