import hashlib
import json
import os
import logging

import yaml

logger = logging.getLogger('homestead')


def text_digest(text):
    return hashlib.md5(text.encode('utf-8')).hexdigest()


def package_path(relative_path):
    """Absolute path of a file shipped inside the homestead package"""
    return os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), relative_path)


def make_output_directory(output_directory):
    if output_directory and not os.path.exists(output_directory):
        os.makedirs(output_directory)
    return output_directory


def read_yaml(path):
    with open(path) as yaml_file:
        return yaml.safe_load(yaml_file)


def write_yaml(document, path):
    with open(path, 'w') as yaml_file:
        yaml.safe_dump(document, yaml_file, default_flow_style=False, sort_keys=True)


def read_json(path):
    with open(path) as json_file:
        return json.load(json_file)


def write_json(document, path):
    with open(path, 'w') as json_file:
        json.dump(document, json_file, sort_keys=True, indent=2)
        json_file.write('\n')


def dumps_record(record):
    # Keys are sorted so identical runs produce identical bytes
    return json.dumps(record, sort_keys=True, separators=(',', ': '))


def write_json_lines(records, path):
    with open(path, 'w') as lines_file:
        for record in records:
            lines_file.write(dumps_record(record) + '\n')


def read_json_lines(path):
    with open(path) as lines_file:
        return [json.loads(line) for line in lines_file if line.strip()]
