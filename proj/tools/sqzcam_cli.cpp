#include "sqzcam/app/commands.hpp"

int main(int argc, char** argv) { return sqzcam::app::run_cli(argc, argv); }
