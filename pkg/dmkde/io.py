import json
import os

from dmkde.errors import IngestionError

CSV_FLOAT_FORMAT = '%.12g'


def write_json(path, document):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(document, f, indent=1, sort_keys=True)
        f.write('\n')


def read_json(path, expected_format):
    if not os.path.exists(path):
        raise IngestionError('no such file: %s' % path)
    with open(path, 'r', encoding='utf-8') as f:
        try:
            document = json.load(f)
        except json.JSONDecodeError as e:
            raise IngestionError(
                'invalid JSON in %s: %s' % (path, e.msg), row=e.lineno)
    if document.get('format') != expected_format:
        raise IngestionError('%s is not a %s document (format=%r)' % (
            path, expected_format, document.get('format')))
    return document


def write_csv(frame, path):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
