#pragma once

#include "flowgame/adversaries.hpp"
#include "flowgame/certificates.hpp"
#include "flowgame/game.hpp"
#include "flowgame/grid_solver.hpp"
#include "flowgame/layered.hpp"
#include "flowgame/match.hpp"
#include "flowgame/measures.hpp"
#include "flowgame/monotone.hpp"
#include "flowgame/node_id.hpp"
#include "flowgame/rational.hpp"
#include "flowgame/strategy.hpp"
#include "flowgame/view.hpp"
