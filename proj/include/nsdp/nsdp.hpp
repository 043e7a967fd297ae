#pragma once

#include "nsdp/cone.hpp"
#include "nsdp/errors.hpp"
#include "nsdp/nlsdp.hpp"
#include "nsdp/sosc.hpp"
#include "nsdp/subderivative.hpp"
#include "nsdp/symmat.hpp"
