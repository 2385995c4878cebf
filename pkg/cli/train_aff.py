import os

import pandas as pd
from absl import app, logging

from cli.session import command, summary_writer
from dmkde.args import FLAGS, experiment_from_flags
from dmkde.dataset import load_csv, standardize
from dmkde.errors import stage
from dmkde.features import AffTrainer
from dmkde.io import write_csv
from dmkde.pipeline import prepare_partitions


@command
def main(logdir):
    config = experiment_from_flags()
    if not config.data_path:
        raise app.UsageError('--data_path is required')

    if config.label_column:
        train, _, _ = prepare_partitions(config)
        samples = train.samples
    else:
        with stage('load'):
            dataset = load_csv(config.data_path)
        if config.standardize:
            with stage('standardize'):
                dataset, _ = standardize(dataset)
        samples = dataset.samples

    writer = summary_writer(logdir)
    with stage('embed'):
        trainer = AffTrainer(samples, config.aff_config(config.seed),
                             writer=writer, verbose=FLAGS.progress)
        params = trainer.train()
    writer.close()

    params.save(os.path.join(logdir, 'params.json'))
    history = pd.DataFrame([vars(record) for record in trainer.history])
    write_csv(history, os.path.join(logdir, 'loss.csv'))
    logging.info('AFF parameters written to %s', os.path.join(logdir, 'params.json'))


if __name__ == '__main__':
    app.run(main)
