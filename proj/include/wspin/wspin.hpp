#pragma once

#include "wspin/errors.hpp"
#include "wspin/taylor.hpp"
#include "wspin/quadrature.hpp"
#include "wspin/clifford.hpp"
#include "wspin/radial_geometry.hpp"
#include "wspin/greens_kernels.hpp"
#include "wspin/witten_model.hpp"
#include "wspin/identity_engine.hpp"
#include "wspin/spectral_radial.hpp"
#include "wspin/config.hpp"
