// Umbrella header for the FocusSDF toolkit.
#pragma once

#include "distance.hpp"
#include "gradcheck.hpp"
#include "grid.hpp"
#include "image_io.hpp"
#include "loss.hpp"
#include "metrics.hpp"
#include "optimize.hpp"
#include "synth.hpp"
