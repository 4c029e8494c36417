#pragma once

#include "swdgp/bench.hpp"
#include "swdgp/errors.hpp"
#include "swdgp/exact.hpp"
#include "swdgp/gridgp.hpp"
#include "swdgp/io.hpp"
#include "swdgp/kernel.hpp"
#include "swdgp/latent.hpp"
#include "swdgp/sine_transform.hpp"
#include "swdgp/swd.hpp"
#include "swdgp/types.hpp"
