"""Generate sample measurement traces for the fpsim example workspace."""
from fpsim.harness.config import load_config
from fpsim.harness.traces import synthesize_experiment_traces, synthesize_trace, write_trace

config = load_config("../experiment.yaml", trials=500, exclude_walls=False)

# Survey: 41 locations x 4 APs x 20 samples
survey = synthesize_trace(config, locations=41, samples=20, seed=42)
write_trace(survey, "survey.csv")
print(f"Generated {len(survey)} rows -> survey.csv")

# Training survey plus runtime trials of one simulated run
synthesize_experiment_traces(config, "train.csv", "eval.csv")
print("Generated train.csv and eval.csv (500 evaluation locations)")
