"""Counter-based random streams.

Every random draw in the toolkit comes from a ``StreamId``: the experiment
seed, the experiment name and a replicate index. The triple is fed to a
``SeedSequence`` whose output keys a Philox counter generator, so replicate
``r`` of an experiment is the same stream regardless of which worker runs it
or in which order.
"""

import zlib

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

SEED_MASK = (1 << 64) - 1


class StreamId(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int = Field(description="64-bit experiment seed.")
    experiment: str = Field(default="default", description="Experiment name.")
    replicate: int = Field(default=0, ge=0, description="Replicate index.")


def experiment_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def seed_sequence(stream: StreamId) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        entropy=stream.seed & SEED_MASK,
        spawn_key=(experiment_key(stream.experiment), stream.replicate),
    )


def generator(stream: StreamId) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed_sequence(stream)))


def replicate_generator(seed: int, experiment: str, replicate: int) -> np.random.Generator:
    return generator(StreamId(seed=seed, experiment=experiment, replicate=replicate))
