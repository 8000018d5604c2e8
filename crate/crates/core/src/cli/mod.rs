//! Configuration files and task execution behind the `optobath` binary.

mod config;
mod run;

pub use config::{
    config_from_echo, parse_config, parse_config_file, parse_config_for, ConfigError, DesignTask,
    FrequencyUnit, OptimizeTask, OutputFormat, OutputOptions, RunConfig, SenseTask, SpectrumTask,
    SweepTask, Task,
};
pub use run::{format_number, run, Cell, RunOutput, Table, TOOL_NAME, TOOL_VERSION};
