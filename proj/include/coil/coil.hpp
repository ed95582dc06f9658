#pragma once

#include "coil/denoise.hpp"
#include "coil/errors.hpp"
#include "coil/fbp.hpp"
#include "coil/field_io.hpp"
#include "coil/geometry.hpp"
#include "coil/image.hpp"
#include "coil/io.hpp"
#include "coil/metrics.hpp"
#include "coil/neural_field.hpp"
#include "coil/noise.hpp"
#include "coil/phantom.hpp"
#include "coil/radon.hpp"
#include "coil/rng.hpp"
#include "coil/solvers.hpp"
#include "coil/tv.hpp"
