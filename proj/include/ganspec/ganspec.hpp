#pragma once

#include "ganspec/adapt.hpp"
#include "ganspec/error.hpp"
#include "ganspec/evalkit.hpp"
#include "ganspec/features.hpp"
#include "ganspec/gmm.hpp"
#include "ganspec/image.hpp"
#include "ganspec/imageio.hpp"
#include "ganspec/manifest.hpp"
#include "ganspec/rng.hpp"
#include "ganspec/spectral.hpp"
#include "ganspec/svm.hpp"
#include "ganspec/synthgen.hpp"
#include "ganspec/text.hpp"
