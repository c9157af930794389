#pragma once

#include "b4nls/spectral/field.hpp"
#include "b4nls/spectral/manifold.hpp"
#include "b4nls/spectral/operators.hpp"
#include "b4nls/spectral/profile.hpp"
#include "b4nls/spectral/random.hpp"
#include "b4nls/spectral/region.hpp"
#include "b4nls/spectral/snapshot.hpp"
