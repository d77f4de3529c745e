#pragma once

#include "wirenet/model.hpp"
#include "wirenet/bloch.hpp"
#include "wirenet/singularity.hpp"
#include "wirenet/berry.hpp"
#include "wirenet/nctorus.hpp"
#include "wirenet/reports.hpp"
