#pragma once

#include <canon/scaled.hpp>
#include <canon/hamiltonian.hpp>
#include <canon/parallel.hpp>
#include <canon/fit.hpp>
#include <canon/monodromy.hpp>
#include <canon/order.hpp>
#include <canon/string_order.hpp>
#include <canon/certificates.hpp>
#include <canon/jacobi.hpp>
#include <canon/generators.hpp>
#include <canon/io.hpp>
