import datetime
import json

from sqlalchemy import Boolean, Column, DateTime, Integer, String, Text, create_engine
from sqlalchemy.ext.declarative import declarative_base
from sqlalchemy.orm import sessionmaker

from common.utils import canonical_json
from common.variables import COMMAND, PASSED, SCENE_DIGEST, SEED, SUMMARY


class RunHistory:
    """
    A wrapper class for the history of command runs.
    It uses a SQLite database, implemented with SQLAlchemy ORM and uses a declarative approach.
    """

    Base = declarative_base()

    class Reports(Base):
        """One stored report per command run."""

        __tablename__ = 'reports'
        id = Column(Integer, primary_key=True)
        command = Column(String)
        suite = Column(String)
        seed = Column(Integer)
        digest = Column(String)
        passed = Column(Boolean)
        run_time = Column(DateTime)
        payload = Column(Text)

        def __init__(self, command, suite, seed, digest, passed, payload):
            self.command = command
            self.suite = suite
            self.seed = seed
            self.digest = digest
            self.passed = passed
            self.run_time = datetime.datetime.now()
            self.payload = payload

    def __init__(self, path):

        self.engine = create_engine(
            f'sqlite:///{path}',
            echo=False,
            pool_recycle=7200,
            connect_args={'check_same_thread': False}
        )

        self.Base.metadata.create_all(self.engine)
        Session = sessionmaker(bind=self.engine)
        self.session = Session()

    def add_report(self, report, suite=None):
        """Stores a command report together with its summary columns."""

        row = self.Reports(
            report[COMMAND],
            suite,
            report.get(SEED),
            report.get(SCENE_DIGEST),
            bool(report.get(SUMMARY, {}).get(PASSED, True)),
            canonical_json(report),
        )
        self.session.add(row)
        self.session.commit()
        return row.id

    def reports(self, command=None):
        """Stored runs as tuples (id, command, suite, seed, passed, run time), oldest first."""

        query = self.session.query(
            self.Reports.id, self.Reports.command, self.Reports.suite, self.Reports.seed,
            self.Reports.passed, self.Reports.run_time,
        )
        # Only the runs of one command when it is given
        if command:
            query = query.filter(self.Reports.command == command)
        return query.order_by(self.Reports.id).all()

    def last(self, command):
        """The most recent report of a command as a dict, or None."""

        row = self.session.query(self.Reports).filter_by(command=command).order_by(self.Reports.id.desc()).first()
        if row is None:
            return None
        return json.loads(row.payload)

    def close(self):
        self.session.close()
        self.engine.dispose()
