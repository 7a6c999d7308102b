#include <pybind11/pybind11.h>
PYBIND11_MODULE(_shocktrack, m) { m.doc() = "stub"; }
