#include "oncovir/runner.hpp"

int main(int argc, char** argv) { return oncovir::run_cli(argc, argv); }
