#!/usr/bin/env python
import io
import json
from os import path, walk
from setuptools import setup

long_description = \
"""Simplicial analysis of finite strategic-form games.

Builds the weighted situation complex of a game, its dual flow nerves and
covering complex, finds Nash equilibrium simplices through best responses and
decomposes the game flow into gradient, harmonic and curl parts.
"""

DATA_SUFFIXES = ('.json', '.cfg')


def load_meta(fp):
    with io.open(fp, encoding='utf8') as f:
        return json.load(f)


def list_files(package_dir):
    output = []
    for root, _, filenames in walk(package_dir):
        for filename in filenames:
            if not filename.startswith('.') and filename.endswith(DATA_SUFFIXES):
                output.append(path.relpath(path.join(root, filename), package_dir))
    return sorted(output)


def list_requirements(meta):
    requirements = []
    if 'setup_requires' in meta:
        requirements += meta['setup_requires']
    if 'requirements' in meta:
        requirements += meta['requirements']
    return requirements


def setup_package():
    root = path.abspath(path.dirname(__file__))
    meta_path = path.join(root, 'meta.json')
    if not path.exists(meta_path):
        meta_path = path.join(root, 'sgc', 'meta.json')
    meta = load_meta(meta_path)
    package_dir = path.join(root, meta['name'])

    setup(
        name=meta['name'],
        description=meta.get('description'),
        author=meta.get('author'),
        author_email=meta.get('email'),
        url=meta.get('url'),
        version=meta['version'],
        license=meta.get('license'),
        packages=[meta['name']],
        package_data={meta['name']: list_files(package_dir)},
        install_requires=list_requirements(meta),
        python_requires=meta.get('python_requires'),
        zip_safe=False,
        entry_points={'console_scripts': ['sgc = sgc.cli:app']},
        long_description=long_description,
        classifiers=[
            'License :: OSI Approved :: MIT License',
            'Operating System :: OS Independent',
            'Programming Language :: Python :: 3',
            'Topic :: Scientific/Engineering :: Mathematics',
        ],
    )


if __name__ == '__main__':
    setup_package()
