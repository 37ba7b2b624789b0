#pragma once

#include "magtunnel/errors.hpp"
#include "magtunnel/jacobi.hpp"
#include "magtunnel/model.hpp"
#include "magtunnel/spectral.hpp"
#include "magtunnel/vortex.hpp"
#include "magtunnel/wkb.hpp"
