// pairfilt.hpp — umbrella header

#pragma once

#include "pairfilt/closed_form.hpp"
#include "pairfilt/detection.hpp"
#include "pairfilt/entanglement.hpp"
#include "pairfilt/errors.hpp"
#include "pairfilt/filter.hpp"
#include "pairfilt/joint_spectrum.hpp"
#include "pairfilt/scenario.hpp"
#include "pairfilt/source.hpp"
#include "pairfilt/spectral.hpp"
#include "pairfilt/sweep.hpp"
#include "pairfilt/units.hpp"
