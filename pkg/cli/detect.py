import os

from absl import app, logging

from cli.session import command, summary_writer
from dmkde.args import experiment_from_flags
from dmkde.evaluation import METRICS, format_table
from dmkde.io import write_csv, write_json
from dmkde.pipeline import run_experiments


def write_experiment(logdir, result, suffix=''):
    write_json(os.path.join(logdir, 'report%s.json' % suffix), result.to_dict())
    write_csv(result.reports[-1].samples_frame(),
              os.path.join(logdir, 'samples%s.csv' % suffix))
    if len(result.reports) > 1:
        for repeat, report in enumerate(result.reports):
            write_csv(report.samples_frame(),
                      os.path.join(logdir, 'samples%s_%d.csv' % (suffix, repeat)))


@command
def main(logdir):
    config = experiment_from_flags()
    if not (config.data_path and config.label_column):
        raise app.UsageError('--data_path and --label_column are required')

    results = run_experiments(config)

    # one state keeps the plain file names, both states get a _<state> suffix
    writer = summary_writer(logdir)
    rows = []
    for result in results:
        suffix = '' if len(results) == 1 else '_' + result.config.state
        for repeat, report in enumerate(result.reports):
            for name, value in report.metric_values().items():
                writer.add_scalar('test%s/%s' % (suffix, name), value, repeat)
        write_experiment(logdir, result, suffix)
        size, method = result.config.label
        rows.append((size, method, result.summary))
        logging.info('%s %s written to %s (%s)', size, method, logdir, ', '.join(
            '%s=%.4f' % (name, result.summary[name + '_mean']) for name in METRICS))
    writer.close()

    table = format_table(rows)
    with open(os.path.join(logdir, 'table.txt'), 'w', encoding='utf-8') as f:
        f.write(table)
    print(table)


if __name__ == '__main__':
    app.run(main)
