#include "diffvor/experiments.hpp"

int main(int argc, char** argv) { return diffvor::run_cli(argc, argv); }
