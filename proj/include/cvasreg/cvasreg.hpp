#ifndef CVASREG_CVASREG_HPP
#define CVASREG_CVASREG_HPP

#include <cvasreg/automata.hpp>
#include <cvasreg/cvas.hpp>
#include <cvasreg/decider.hpp>
#include <cvasreg/engine.hpp>
#include <cvasreg/io.hpp>
#include <cvasreg/linear.hpp>
#include <cvasreg/lowerbound.hpp>
#include <cvasreg/rational.hpp>
#include <cvasreg/scheme.hpp>

#endif  // CVASREG_CVASREG_HPP
