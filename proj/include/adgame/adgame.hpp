#pragma once

#include <adgame/defender.hpp>
#include <adgame/error.hpp>
#include <adgame/exact_solver.hpp>
#include <adgame/experiment.hpp>
#include <adgame/generator.hpp>
#include <adgame/graph.hpp>
#include <adgame/graph_io.hpp>
#include <adgame/kernel.hpp>
#include <adgame/mdp.hpp>
#include <adgame/mlp.hpp>
#include <adgame/plan.hpp>
#include <adgame/random.hpp>
#include <adgame/simulator.hpp>
#include <adgame/value_net.hpp>
