#pragma once

#include "ionet/dataset_io.hpp"
#include "ionet/error.hpp"
#include "ionet/evaluation.hpp"
#include "ionet/neural_odometry.hpp"
#include "ionet/pdr.hpp"
#include "ionet/rng.hpp"
#include "ionet/simulator.hpp"
#include "ionet/so3.hpp"
#include "ionet/strapdown.hpp"
#include "ionet/types.hpp"
#include "ionet/window_model.hpp"
