#include "pinn/cli.hpp"

int main(int argc, char** argv) { return pinn::cli_run(argc, argv); }
