#pragma once

#include "banach_oc/errors.hpp"
#include "banach_oc/spectral.hpp"
#include "banach_oc/control.hpp"
#include "banach_oc/system.hpp"
#include "banach_oc/amari.hpp"
#include "banach_oc/lq_toy.hpp"
#include "banach_oc/dynamics.hpp"
#include "banach_oc/cost.hpp"
#include "banach_oc/parallel.hpp"
#include "banach_oc/report.hpp"
#include "banach_oc/pmp.hpp"
#include "banach_oc/monotone.hpp"
