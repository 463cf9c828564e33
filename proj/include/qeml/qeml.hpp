#pragma once

#include "qeml/errors.hpp"
#include "qeml/random.hpp"
#include "qeml/linalg.hpp"
#include "qeml/channel.hpp"
#include "qeml/generators.hpp"
#include "qeml/witness.hpp"
#include "qeml/verify.hpp"
#include "qeml/io.hpp"
