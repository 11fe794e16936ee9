from setuptools import setup

setup(
    name="asymprune",
    version="0.1.0",
    description="Asymmetric encoder/decoder layer pruning and latency study for toy T5-style models",
    packages=[
        "utils",
        "tensor_autodiff",
        "seq2seq_model",
        "seq2seq_model.Config",
        "structural_pruning",
        "generation_engine",
        "corpus",
        "eval_metrics",
        "bench_harness",
        "bench_harness.Config",
        "stf_pipeline",
        "stf_pipeline.Config",
        "stf_pipeline.nodes",
        "cli_reporting",
    ],
    py_modules=["main"],
    python_requires=">=3.10",
    install_requires=[
        "numpy>=1.26",
        "pandas>=2.1",
        "pydantic>=2.0.0",
        "pydantic-settings>=2.10",
        "python-dotenv>=1.0.0",
        "rich>=13.9.0",
        "tqdm>=4.67",
        "orjson>=3.11",
        "xxhash>=3.5",
        "zstandard>=0.24",
        "PyYAML>=6.0",
        "click>=8.2",
        "psutil>=7.0",
        "langgraph>=0.6",
    ],
    extras_require={"test": ["pytest>=8.0"]},
    entry_points={"console_scripts": ["asymprune=main:main"]},
)
